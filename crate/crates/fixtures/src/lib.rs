//! Synthetic source corpora and randomized instance generators shared by the
//! test suites and benchmarks.
//!
//! The named corpora model the recurring constraint patterns the tool is
//! exercised against: a framework annotation requirement over an entity
//! module, a serialization requirement over DTOs with two deliberately
//! misplaced classes, a DAO factory privilege, globally forbidden controller
//! construction, and a controller declaring a concrete DAO instead of its
//! interface.

pub mod random;

use std::path::Path;

/// A source tree plus its constraint file.
#[derive(Debug, Clone)]
pub struct Corpus {
    /// (relative path, file content)
    pub files: Vec<(String, String)>,
    pub dcl: String,
}

impl Corpus {
    /// Writes the sources under `root/src` and the constraints to
    /// `root/rules.dcl`; returns `(src_dir, dcl_path)`.
    pub fn write_to(&self, root: &Path) -> std::io::Result<(std::path::PathBuf, std::path::PathBuf)> {
        let src = root.join("src");
        for (rel, content) in &self.files {
            let path = src.join(rel);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent)?;
            }
            std::fs::write(path, content)?;
        }
        let dcl_path = root.join("rules.dcl");
        std::fs::write(&dcl_path, &self.dcl)?;
        Ok((src, dcl_path))
    }
}

fn file(path: &str, content: String) -> (String, String) {
    (path.to_string(), content)
}

/// Twenty entity classes; all but `E19`/`E20` miss the framework's
/// description-property annotation. One `must-useannotation` constraint.
pub fn gp4() -> Corpus {
    let mut files = vec![file(
        "linkcom/neo/bean/annotation/DescriptionProperty.java",
        "package linkcom.neo.bean.annotation;\n\npublic @interface DescriptionProperty {\n}\n".to_string(),
    )];
    for i in 1..=20 {
        let name = format!("E{i:02}");
        let annotated = i >= 19;
        let mut body = String::from("package com.gep.entities;\n\nimport java.util.Date;\n");
        if annotated {
            body.push_str("import linkcom.neo.bean.annotation.DescriptionProperty;\n");
        }
        body.push('\n');
        if annotated {
            body.push_str("@DescriptionProperty\n");
        }
        body.push_str(&format!(
            "public class {name} {{\n    Date created;\n    String label;\n}}\n"
        ));
        files.push(file(&format!("com/gep/entities/{name}.java"), body));
    }
    Corpus {
        files,
        dcl: "module Entities: com.gep.entities.**\n\
              GP4: Entities must-useannotation linkcom.neo.bean.annotation.DescriptionProperty\n"
            .to_string(),
    }
}

/// Ten DTO classes: two already serializable, six missing the interface but
/// structurally at home in `DTO`, and two whose dependency profile matches
/// the `Constant` module instead.
pub fn tc1() -> Corpus {
    let mut files = vec![
        file("com/tc/model/Item.java", "package com.tc.model;\n\npublic class Item {\n}\n".into()),
        file("com/tc/model/Money.java", "package com.tc.model;\n\npublic class Money {\n}\n".into()),
    ];
    for name in ["ConstA", "ConstB"] {
        files.push(file(
            &format!("com/tc/constant/{name}.java"),
            format!(
                "package com.tc.constant;\n\npublic class {name} {{\n    String code;\n    Integer level;\n    Boolean enabled;\n}}\n"
            ),
        ));
    }
    for i in 1..=10 {
        let name = format!("D{i:02}");
        let serializable = i <= 2;
        let constant_shaped = i >= 9;
        let mut body = String::from("package com.tc.dto;\n\n");
        if serializable {
            body.push_str("import java.io.Serializable;\n");
        }
        if constant_shaped {
            body.push_str(&format!(
                "\npublic class {name} {{\n    String code;\n    Integer level;\n    Boolean enabled;\n}}\n"
            ));
        } else {
            body.push_str("import com.tc.model.Item;\nimport com.tc.model.Money;\nimport java.util.Date;\n");
            let header = if serializable {
                format!("public class {name} implements Serializable")
            } else {
                format!("public class {name}")
            };
            body.push_str(&format!(
                "\n{header} {{\n    Item item;\n    Money total;\n    Date shipped;\n}}\n"
            ));
        }
        files.push(file(&format!("com/tc/dto/{name}.java"), body));
    }
    Corpus {
        files,
        dcl: "module DTO: com.tc.dto.**\n\
              module Constant: com.tc.constant.**\n\
              TC1: DTO must-implement java.io.Serializable\n"
            .to_string(),
    }
}

const TC5_DAOS: [&str; 4] = ["UserDAO", "OrderDAO", "ItemDAO", "ReportDAO"];

/// A DAO package with a factory, and services instantiating DAOs directly:
/// thirteen out-of-factory creations.
pub fn tc5() -> Corpus {
    let mut files = Vec::new();
    for dao in TC5_DAOS {
        let ctor = if dao == "ReportDAO" {
            format!("    public {dao}(String title) {{\n    }}\n")
        } else {
            String::new()
        };
        files.push(file(
            &format!("tcom/server/persistence/dao/{dao}.java"),
            format!(
                "package tcom.server.persistence.dao;\n\npublic class {dao} {{\n{ctor}    public void persist() {{\n    }}\n}}\n"
            ),
        ));
    }
    files.push(file(
        "tcom/server/persistence/dao/BaseJPADAO.java",
        "package tcom.server.persistence.dao;\n\n\
         public class BaseJPADAO {\n\
         \x20   public static UserDAO getUserDAO() {\n        return new UserDAO();\n    }\n\
         \x20   public static OrderDAO getOrderDAO() {\n        return new OrderDAO();\n    }\n\
         \x20   public static ItemDAO getItemDAO() {\n        return new ItemDAO();\n    }\n\
         \x20   public static ReportDAO getReportDAO(String title) {\n        return new ReportDAO(title);\n    }\n\
         }\n"
            .to_string(),
    ));
    // 13 direct instantiations spread over five services.
    let service_news: [(&str, &[&str]); 5] = [
        ("BillingService", &["UserDAO", "OrderDAO", "ItemDAO"]),
        ("ShippingService", &["OrderDAO", "ItemDAO", "UserDAO"]),
        ("AccountService", &["UserDAO", "UserDAO", "OrderDAO"]),
        ("SearchService", &["ItemDAO", "OrderDAO"]),
        ("ReportService", &["ReportDAO", "ReportDAO"]),
    ];
    for (svc, daos) in service_news {
        let mut body = String::from("package tcom.server.service;\n\n");
        for dao in TC5_DAOS {
            if daos.contains(&dao) {
                body.push_str(&format!("import tcom.server.persistence.dao.{dao};\n"));
            }
        }
        body.push_str(&format!("\npublic class {svc} {{\n    public void run() {{\n"));
        for (i, dao) in daos.iter().enumerate() {
            if *dao == "ReportDAO" {
                body.push_str(&format!("        ReportDAO r{i} = new ReportDAO(\"r{i}\");\n"));
                body.push_str(&format!("        r{i}.persist();\n"));
            } else {
                body.push_str(&format!("        {dao} d{i} = new {dao}();\n"));
                body.push_str(&format!("        d{i}.persist();\n"));
            }
        }
        body.push_str("    }\n}\n");
        files.push(file(&format!("tcom/server/service/{svc}.java"), body));
    }
    Corpus {
        files,
        dcl: "module DAO: tcom.server.persistence.dao.**\n\
              module Services: tcom.server.service.**\n\
              TC5: only tcom.server.persistence.dao.BaseJPADAO can-create DAO\n"
            .to_string(),
    }
}

/// Controllers and a data source that must be provided by injection: three
/// forbidden instantiations, nothing in the system may create them.
pub fn tc9() -> Corpus {
    let files = vec![
        file(
            "com/sys/web/LoginController.java",
            "package com.sys.web;\n\npublic class LoginController {\n}\n".into(),
        ),
        file(
            "com/sys/web/ReportController.java",
            "package com.sys.web;\n\npublic class ReportController {\n}\n".into(),
        ),
        file(
            "com/sys/db/AppDataSource.java",
            "package com.sys.db;\n\npublic class AppDataSource {\n    public void open() {\n    }\n}\n".into(),
        ),
        file(
            "com/sys/Main.java",
            "package com.sys;\n\nimport com.sys.web.LoginController;\nimport com.sys.db.AppDataSource;\n\n\
             public class Main {\n    public void boot() {\n        new LoginController();\n        AppDataSource ds = new AppDataSource();\n        ds.open();\n    }\n}\n"
                .into(),
        ),
        file(
            "com/sys/Boot.java",
            "package com.sys;\n\nimport com.sys.web.ReportController;\n\n\
             public class Boot {\n    public void init() {\n        ReportController rc = new ReportController();\n        rc.toString();\n    }\n}\n"
                .into(),
        ),
    ];
    Corpus {
        files,
        dcl: "module Controller: com.sys.web.**\n\
              module DataSource: com.sys.db.**\n\
              TC9: $system cannot-create Controller, DataSource\n"
            .to_string(),
    }
}

/// A controller declaring a concrete Hibernate DAO instead of its interface.
/// With `use_missing_member` the controller also calls `flush()`, which the
/// interface does not provide.
pub fn d1(use_missing_member: bool) -> Corpus {
    let flush_call = if use_missing_member { "        dao.flush();\n" } else { "" };
    let files = vec![
        file(
            "com/app/model/Product.java",
            "package com.app.model;\n\npublic class Product {\n}\n".into(),
        ),
        file(
            "com/app/dao/IProductDAO.java",
            "package com.app.dao;\n\nimport com.app.model.Product;\n\n\
             public interface IProductDAO {\n    void save(Product p);\n}\n"
                .into(),
        ),
        file(
            "com/app/dao/hib/ProductHibernateDAO.java",
            "package com.app.dao.hib;\n\nimport com.app.dao.IProductDAO;\nimport com.app.model.Product;\n\n\
             public class ProductHibernateDAO implements IProductDAO {\n\
             \x20   public void save(Product p) {\n    }\n\
             \x20   public void flush() {\n    }\n\
             }\n"
                .into(),
        ),
        file(
            "com/app/web/ProductController.java",
            format!(
                "package com.app.web;\n\nimport com.app.dao.hib.ProductHibernateDAO;\nimport com.app.model.Product;\n\n\
                 public class ProductController {{\n\
                 \x20   public void update(Product p) {{\n\
                 \x20       ProductHibernateDAO dao = new ProductHibernateDAO();\n\
                 \x20       dao.save(p);\n{flush_call}\
                 \x20   }}\n\
                 }}\n"
            ),
        ),
    ];
    Corpus {
        files,
        dcl: "module Controller: com.app.web.**\n\
              module HibernateDAO: com.app.dao.hib.**\n\
              HIB1: Controller cannot-depend HibernateDAO\n"
            .to_string(),
    }
}

/// A plain `cannot-access` violation: none of the catalog rules repairs it,
/// so the engine must answer with diagnostics only.
pub fn unrecommendable() -> Corpus {
    let files = vec![
        file(
            "com/m/Data.java",
            "package com.m;\n\npublic class Data {\n    public void render() {\n    }\n}\n".into(),
        ),
        file(
            "com/v/Screen.java",
            "package com.v;\n\nimport com.m.Data;\n\n\
             public class Screen {\n    public void show(Data d) {\n        d.render();\n    }\n}\n"
                .into(),
        ),
    ];
    Corpus {
        files,
        dcl: "module View: com.v.**\nmodule Model: com.m.**\nNOREC: View cannot-access Model\n".to_string(),
    }
}

/// A corpus with a syntax error outside the subset grammar.
pub fn broken() -> Corpus {
    Corpus {
        files: vec![file(
            "com/x/Bad.java",
            "package com.x;\n\npublic class Bad {\n    void m() {\n        while (true) { }\n    }\n}\n".into(),
        )],
        dcl: String::new(),
    }
}
